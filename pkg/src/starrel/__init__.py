"""Relations on noncommutative *-polynomials, checked on matrix tuples."""
from .errors import *  # noqa: F401,F403
from .ncexpr import (UNIT, ZERO, Adjoint, Func, Gen, NCExpr, Product, ScalarMul, StarPolynomial, Sum, Unit,
                     absolute, adjoint, exp, gens, inv, normalize, sqrt, substitute, to_polynomial)
from .matrep import MatHom, RepTuple, direct_sum, evaluate, op_norm, pushforward
from .relations import (Block, CheckReport, EqZero, NormLe, NormLt, OrderChain, Psd, RelationSet, check,
                        combine_to_single, order_chain, residual, run_axiom_harness)
from .comatrix import ScalarRep, assemble, unfold
from .gmembed import alternating_certificate, embed, is_zero_certified
from .fdca import BlockIdeal, FDAlgebra, lift_coherent_sequence, lift_pair, pushout_of_quotients
from .search import SearchConfig, find_representation, probe_norm_bound
from .dsl import RelationDocument, format_document, parse, parse_expr

__version__ = "0.1.0"
