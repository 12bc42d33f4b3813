"""Exact Dieudonne-module computations over finite-field Witt vectors.

Classification by Newton polygon, minimal sub/over-modules and minimal
isogenies, endomorphism orders with their p-adic co-indices, and the
arithmetic stratification of the genus-2 supersingular locus.
"""

__version__ = "0.1.0"

from .conway import conway_polynomial
from .endo import (AlgebraStructure, EndoOrder, coindex,
                   coindex_under_conjugation, endomorphism_algebra,
                   endomorphism_ring, is_maximal, maximal_order_basis,
                   order_report)
from .errors import (AcceptanceFailure, CapacityError, ContainmentError,
                     DieudonneError, ExtensionError, InputError,
                     InternalError, PrecisionError, RankError)
from .isocrystal import (DieudonneModule, IsocrystalAmbient,
                         IsotypicComponent, NewtonPolygon, SkeletonBasis,
                         direct_sum, dual_module, extend_module,
                         isotypic_decomposition, newton_polygon, pi0_apply,
                         skeleton, skeleton_lattice, standard_ambient,
                         standard_module)
from .linalg import (PadicMatrix, integral_solution_lattice,
                     lattice_contains, lattice_equal, lattice_from_columns,
                     lattice_index_exponent, lattice_intersection,
                     lattice_sum, smith_normal_form)
from .minimal import (MinimalIsogenyData, MinimalityCertificate,
                      enumerate_stable_overlattices,
                      enumerate_stable_sublattices, is_minimal,
                      manin_bound_harness, minimal_isogeny,
                      minimal_overmodule, minimal_submodule,
                      polygons_of_height, random_fv_stable_lattice,
                      transport_endomorphism)
from .serialize import (load_module, module_from_json, module_to_json,
                        save_module)
from .sslocus import (FamilyPoint, StratumTable, SuperspecialBase,
                      c_p_profile, point_module, sample_level3_points,
                      stratification, superspecial_base)
from .wittring import (WittElement, WittRing, default_precision, frobenius,
                       make_witt_ring, tower_embedding)
