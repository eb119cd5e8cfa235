from common import errors, functions, types, variants
from common.variants import Variant, Weighting, StepKind, TerminalStatus
