from .compose import Composition, compose
from .consequence import consequence_closure, consequence_steps
from .coretrans import coretrans, coretrans_all
from .decide import Verdict, VerdictKind, decide, decide_sequent
from .engine import NodeKind, ProfileEngine, ProfileRelation, compute_profiles, pool_for, prepare
from .points_to import pto_profile
from .quantifiers import add_var, add_vars, rem_var
