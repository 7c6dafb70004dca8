"""Ellsberg's urn: 30 red balls, 60 black or yellow in unknown proportion.

The usual preference pattern (I over II, IV over III) is what a cautious
decision maker picks for every positive caution level.
"""

from caution import ellsberg_setting, kcg_action_discrete

for setting in (1, 2):
    loss, plausible, working = ellsberg_setting(setting)
    print(f"setting {setting}: actions {loss.actions}")
    for kappa in (0.0, 0.1, 0.5, 1.0):
        res = kcg_action_discrete(loss, plausible, working, kappa)
        # objectives are losses, i.e. negated expected winnings in dollars
        print(f"  kappa={kappa:3.1f}  choose {res.action:<3} objective {res.objective:9.4f}  ({res.existence.value})")
