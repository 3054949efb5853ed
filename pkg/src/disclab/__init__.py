"""disclab: L2 and dyadic BMO discrepancy of point sets via an exact Haar engine."""
from .pointset import (PointSet, PointSetError, empty, from_points, gen_corner,
                       gen_hammersley, gen_random, generate, load_pointset, dump_pointset)
from .haar import (DyadicIndex, HaarCoefficient, haar_coefficient, haar_energy, level_sum,
                   tail_bound)
from .discrepancy import (DiscrepancyResult, Measure, Method, extreme_initial, extreme_l2,
                          extreme_l2_haar, star_initial, star_l2, star_l2_haar)
from .bmo import (BmoEstimate, bmo_discrepancy, bmo_dyadic_box, bmo_global, bmo_initial,
                  bmo_union_search, default_search_level)
from .bounds import (curse_lower_bound_bmo, curse_lower_bound_extreme, curse_table,
                     empirical_inverse, inverse_report, roth_curve)

__version__ = "0.1.0"
