from mtdgame import GameConfig, PolynomialReward, validate_config


def make_game(exponent=1, alpha=1.0, **kw):
    base = dict(T=3.0, lambda_max=3.0, C_a=0.1, C_d=0.1)
    base.update(kw)
    return validate_config(GameConfig(reward=PolynomialReward(exponent, alpha), **base))
