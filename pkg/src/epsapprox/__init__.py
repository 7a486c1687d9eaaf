"""Deterministic epsilon-approximations for geometric range spaces."""

__version__ = "0.1.0"

from .geometry import (AxisRect, ConvexPolygon, DirectionSet, KOrientedRange, LinearPatch,
                       PLTerrain, RangeFamily, WeightedPointSet, clip, contains, integrate_linear,
                       project, terrain_measure)
from .discrepancy import (CanonicalIncidence, Coloring, beck_fiala, canonical_structure,
                          certified_bound, halve)
from .merge_reduce import (ApproxCertificate, ReduceConfig, epsilon_approx,
                           random_sample_baseline, weighted_epsilon_approx)
from .lowdisc import (DegenerateRegionError, LatticeSpec, bit_reversal, delta_stretch,
                      irrational_lattice, lattice_sample_polytope, stretched_vdc, van_der_corput)
from .terrain import (GaussianSpec, SmoothTerrainSpec, gaussian_approx, gaussian_truncate,
                      pl_terrain_approx, smooth_split, smooth_terrain_approx,
                      truncation_half_width)
from .scan import (PiecewisePoly1D, ScanResult, max_rect_general, max_rect_linear,
                   max_rect_poisson_approx, poisson_disc, terrain_max_halfspace,
                   terrain_max_slab)
from .sentinel import SentinelFamily, build_sentinels, disjoint_sentinels, verify_sentinel
from .oracle import (OracleReport, comb_disc, eps_error_discrete, eps_error_terrain,
                     lebesgue_disc, mc_check)
from .kernels import BACKEND

__all__ = [n for n, v in dict(globals()).items()
           if not n.startswith("_") and type(v).__name__ != "module"]
