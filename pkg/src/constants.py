"""Application-wide constants."""

TOOL_VERSION = "0.1.0"

# Scalars
DEFAULT_ORDER_CAP = 2 ** 20  # Largest root-of-unity order accepted

# Enumeration caps
DEFAULT_AUTOMORPHISM_CAP = 4096  # Max |A| for automorphism and form enumeration
DEFAULT_SUBGROUP_CAP = 256  # Max |A| for subgroup enumeration
DEFAULT_MATRIX_ENTRY_CAP = 2_000_000  # Max rows * cols of a bar-complex differential
DEFAULT_CLIFFORD_CAP = 200_000  # Max homogeneous candidates in a Lipschitz enumeration

# Cohomology limits
MAX_EM_GROUP_ORDER = 4  # Eilenberg-MacLane complex is built in degree 3 over |A|^3 tables
MAX_DEGREE4_GROUP_ORDER = 4
MAX_DEGREE3_GROUP_ORDER = 12

# Batch execution
DEFAULT_WORKERS = 4
DEFAULT_SEED = 0
SCALAR_PROPERTY_SAMPLES = 1000  # Random triples checked by `scalars check`
SCALAR_PROPERTY_MAX_ORDER = 360  # Sampled orders divide this

# Input limits
MAX_SPEC_LENGTH = 1000  # Characters accepted in a single group/form/tau spec

# Exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILURE = 1
EXIT_USAGE = 2
EXIT_CAP_EXCEEDED = 3
