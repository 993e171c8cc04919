"""Reference device constants shared by the tests."""

import math

from memsdelay.model import ActuatorParams, Linear, VoltageProfile

# reference dimensionless device (rounded values)
E, C, G1, G2, V0 = 9.9e-6, 5.4e-3, 3e-4, 0.37, 20.0
DELTA = 0.1579
GAMMA = 3e-4
T = 2.0 * math.pi

#: extended-precision evaluation (50 digits, mpmath eigsy for lambda) of the
#: delay bound at the reference device
D0_ORACLE = 18.101653404291855


def table2_params(delta=0.0, d=0.0, g1=G1, g2=G2, damping=None):
    return ActuatorParams(E, damping or Linear(C), VoltageProfile.cosine(V0, delta), g1, g2, d)


#: one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []
