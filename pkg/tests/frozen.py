"""Reference values frozen from the exact oracles in oracles.py.

Each test module that uses one of these also re-derives it from the oracle
(see the test_frozen_values_rederive tests), so a drift in either shows up.
"""

# exact-fraction partial sums: 120 terms for linear sequences, 60 primes
ENCODED = {
    (2, 1): "3.82137226928489599538164942283823008264695725125038439544928",
    (3, 1): "4.86873566911822314136014400133845203322841217231101577882299",
    (4, 2): "4.36918614587730630264166021815625074913846644886794841510274",
    (5, 3): "4.89195608918979484243245925402481777568172048091581716609195",
}
PRIME_CONSTANT = "2.92005097731613471209256291711201946800272789932142671977268"
# exact Gaussian-rational partial sum, 120 terms
AI1 = ("1.77514178289971335534970491514587432094396019042241336883461",
       "1.29877215254543141619633112545886537898343976280495817926844")
# exact floor recurrence from the 200-term rational partial sum of A(2,1)
R_SPOT = ["0.8213722692848960", "0.4641168078546880", "0.3205840392734399",
          "0.2440882749140795", "0.1967944742267156"]

ERF_HALF = "0.520499877813046537682746653891964528736451575757963700058806"
ERF_INV_SQRT2 = "0.682689492137085897170465091264075844955825933453208781974789"
GAMMA_THIRD = "2.67893853470774763365569294097467764412868937795730110095043"
UPPER_THIRD_THIRD = "0.756892381027152108722540464352996363218191379075308266191910"
S_ONE = "1.41068613464244799769082471141911504132347862562519219772464"
S_HALF = "1.18459307293865315132083010907812537456923322443397420755137"
T_PLUS_HALF = "1.36008400636827307602533659844187944992588854193525120544812"
T_MINUS_HALF = "0.397947211410258394538628573440553432040918956303126174302019"

# sqrt(e pi/2) - S(1) and sqrt(pi e^5/10) - S(5)
CF_ONE = "0.655679542418798471543871230730811283399282332870462028053686"
CF_FIVE = "0.173078517303020459179316788304694859619727842385104537426965"
SQRT_PI_E_HALF = "2.06636567706124646923469594214992632472276095849565422577833"
