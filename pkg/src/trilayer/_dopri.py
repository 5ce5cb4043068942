"""Dormand-Prince 5(4) coefficients shared by the radial and time integrators.

The pair propagates the 5th-order solution (local extrapolation) with a
4th-order embedded error estimate and the standard quartic dense-output
interpolant.  Coefficients are the classic published rationals.
"""

from __future__ import annotations

# stage abscissae
C2 = 1.0 / 5.0
C3 = 3.0 / 10.0
C4 = 4.0 / 5.0
C5 = 8.0 / 9.0

# stage weights
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)

# 5th-order solution weights (b2 = 0); stage 7 is FSAL
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0

# error-estimate weights, b - b_hat (e2 = 0)
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0

# dense-output polynomial: y(t0 + th) = y0 + h*t * sum_i k_i * (P[i][0] + t*(P[i][1] + t*(P[i][2] + t*P[i][3])))
# (row 2 is identically zero and omitted from the evaluation loops)
P1 = (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0)
P3 = (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0)
P4 = (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0)
P5 = (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0)
P6 = (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0)
P7 = (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0)

# step-size controller bounds
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_EXPONENT = -0.2  # -1/(order of the error estimator + 1)


def weight(p, t):
    """Evaluate one dense-output cubic-in-t weighting polynomial at t."""
    return p[0] + t * (p[1] + t * (p[2] + t * p[3]))


def step_factor(err_norm):
    """Step-size multiplier from a scaled error norm (err <= 1 accepts)."""
    if err_norm == 0.0:
        return MAX_FACTOR
    return min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err_norm ** ERR_EXPONENT))
