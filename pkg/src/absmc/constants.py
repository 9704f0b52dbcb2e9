"""All physical constants, action grids, bounds and reward settings for the
four built-in benchmark systems.

These are the classic-control equations in their standard discrete form;
acceptance tests pin every value here.  Changing a constant invalidates any
previously trained policy for that environment.
"""

import math

# ---------------------------------------------------------------- mountain car
# v' = v + MC_FORCE * a - MC_GRAVITY * cos(3 p);  p' = p + v'
# a in {-1, 0, +1}; hitting the left wall zeroes a negative velocity.
MC_FORCE = 0.001
MC_GRAVITY = 0.0025
MC_POS_BOUNDS = (-1.2, 0.6)
MC_VEL_BOUNDS = (-0.07, 0.07)
MC_ACTIONS = (-1.0, 0.0, 1.0)
MC_GOAL_POSITION = 0.5
MC_INITIAL_BOX = ((-0.5001, 0.0), (-0.5, 0.0))
MC_STEP_REWARD = -1.0

# ------------------------------------------------------------------- pendulum
# Inverted pendulum, state (theta, omega), theta = 0 upright.
# omega' = clip(omega + (3g/(2l) sin(theta) + 3/(m l^2) u) dt)
# theta' = clip(theta + omega' dt)          (semi-implicit Euler, as in Gym)
PEND_G = 10.0
PEND_L = 1.0
PEND_M = 1.0
PEND_DT = 0.05
PEND_THETA_BOUNDS = (-math.pi, math.pi)
PEND_OMEGA_BOUNDS = (-8.0, 8.0)
PEND_TORQUES = (-2.0, 0.0, 2.0)
PEND_INITIAL_BOX = ((0.0, 0.0), (0.01, 0.01))
# reward = -(theta^2 + 0.1 omega^2 + 0.001 u^2)
PEND_REWARD_OMEGA_WEIGHT = 0.1
PEND_REWARD_TORQUE_WEIGHT = 0.001

# ------------------------------------------------------------------- cartpole
# State (x, v, theta, omega); the standard cart-pole ODEs, explicit Euler.
CP_GRAVITY = 9.8
CP_MASS_CART = 1.0
CP_MASS_POLE = 0.1
CP_TOTAL_MASS = CP_MASS_CART + CP_MASS_POLE
CP_HALF_LENGTH = 0.5
CP_POLEMASS_LENGTH = CP_MASS_POLE * CP_HALF_LENGTH
CP_FORCES = (-10.0, 10.0)
CP_DT = 0.02
CP_X_BOUNDS = (-4.8, 4.8)
CP_V_BOUNDS = (-4.0, 4.0)
CP_THETA_BOUNDS = (-0.5, 0.5)
CP_OMEGA_BOUNDS = (-4.0, 4.0)
CP_INITIAL_BOX = ((0.0, 0.0, 0.0, 0.0), (0.01, 0.01, 0.01, 0.01))
# training episode ends (and the +1 survival reward stops) past these:
CP_X_FAIL = 2.4
CP_THETA_FAIL = 0.21

# ------------------------------------------------------------- 4-car platoon
# Discrete-time linear system s' = A s + B u; 7 state variables:
# lead velocity v0, then (gap d_i, relative velocity dv_i) per follower.
# Followers run a proportional controller a_i = K_P d_i + K_D dv_i; the
# action u is the lead car's acceleration.
PLATOON_DT = 0.1
PLATOON_KP = 0.5
PLATOON_KD = 1.0
PLATOON_ACTIONS = (-1.0, 0.0, 1.0)
PLATOON_LOWER = (-5.0, -1.0, -2.0, -1.0, -2.0, -1.0, -2.0)
PLATOON_UPPER = (5.0, 3.0, 2.0, 3.0, 2.0, 3.0, 2.0)
PLATOON_INITIAL_BOX = (
    (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    (0.1, 0.01, 0.1, 0.01, 0.1, 0.01, 0.1),
)
PLATOON_GAP_TARGET = 0.5
PLATOON_COLLISION_PENALTY = -100.0

# Outward slack added to every interval image, absorbing last-ulp rounding
# of the scalar dynamics; must stay below the point-box tightness bound 1e-9.
STEP_BOX_SLACK = 1e-12
