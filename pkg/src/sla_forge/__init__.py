"""Sparse transmit/receive array design for MIMO radar DOA-versus-DOD imaging."""

__version__ = "0.1.0"

from .beampattern import (AngularGrid, Beampattern1D, Image2D, MetricsReport,
                          PatternError, beampattern_1d, df_loss, df_loss_bound,
                          directivity_factor, evaluate_pair, image_2d,
                          measure_beamwidth_3db, min_aperture_for_resolution,
                          psl_1d, psl_2d, resolution_from_aperture,
                          sidelobe_region, steering_vector, virtual_beampattern,
                          worst_case_df_loss)
from .geometry import (ArrayGeometry, DesignConfig, GeometryError,
                       InfeasibleError, VirtualArray, check_virtual_constraint,
                       make_virtual, mra, nested, random_feasible_pair, ula)
from .optimizer import (DesignResult, StartRecord, coordinate_sweep,
                        cyclic_design, multi_start_design)
from .oracle import EnumerationReport, exhaustive_search, psl_dense_scan
