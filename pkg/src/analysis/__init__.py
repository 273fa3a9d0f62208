from .alloc import alloc_terms, compute_alloc_sets
from .establishment import check_established
from .models import AllocStatus, AllocTable, EstablishmentReport, Locus, RootAnalysis, Violation, ViolationKind
from .normalized import check_normalized
from .restrictions import check_erestricted
from .roots import infer_roots_and_check
