from typing import Final

# Application Meta
APP_NAME: Final = "py-cnar"
APP_DISPLAY_NAME: Final = "Community Network Autoregression"
CLI_NAME: Final = "py-cnar"
CLI_ALIAS: Final = "cnar"

# Numerical tolerances shared across modules
ORTHONORMAL_TOL: Final = 1e-10
MAX_GRAM_CONDITION: Final = 1e12
VARIANCE_FLOOR: Final = 1e-8

# Simulation defaults
DEFAULT_BURN_IN: Final = 200
EXAMPLE_B1_SEQUENCE_STEP: Final = 0.1
