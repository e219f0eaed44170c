"""Closure analysis of codimension-1 subspaces in Clifford algebras g(n, F)."""

from .bases import CanonicalBasisFamily, enumerate_families, family_by_number
from .blades import Blade, Multivector, Signature, blade_product, parse_blade
from .closure import CharMode, EngineConfig, ProofTrace, derive_constraints, express_in_span, prove_no_subalgebra
from .scan import check_subspace, scan
from .tables import ReferenceTable, generate_table, verify_against_reference
from .trace import verify_trace

__version__ = "0.1.0"

__all__ = [
    "Blade", "CanonicalBasisFamily", "CharMode", "EngineConfig", "Multivector", "ProofTrace", "ReferenceTable",
    "Signature", "blade_product", "check_subspace", "derive_constraints", "enumerate_families",
    "express_in_span", "family_by_number", "generate_table", "parse_blade", "prove_no_subalgebra", "scan",
    "verify_against_reference", "verify_trace",
]
