"""Optimal partitions for the first Robin Laplacian eigenvalue on pixel grids."""
from .grid import (
    CellSet,
    GridSpec,
    boundary_measure,
    connected_components,
    make_grid,
    rasterize_ball,
    rasterize_box,
    rasterize_polygon,
    regular_polygon,
    relative_isoperimetric_ratio,
    volume,
)
from .eigen import (
    EigenResult,
    RobinOperator,
    analytic_lambda_disk,
    analytic_lambda_interval,
    assemble,
    check_scaling,
    rayleigh_quotient,
    robin_eigenvalue,
    smallest_eigenpair,
)
from .energy import (
    EMPTY,
    EmptyResult,
    EnergyBreakdown,
    PartitionState,
    PhaseField,
    competitor_cap,
    competitor_remove_ball,
    competitor_truncate,
    disjointness_check,
    phase_energy,
    total_energy,
)
from .optimizer import OptimizerConfig, OptimizerTrace, extract_open_sets, init_partition, optimize, sweep
from .cheeger import cheeger_convex_polygon, cheeger_disk, defining_residual
from .analysis import ahlfors_probe, density_probe, faber_krahn_gap, honeycomb_scaling, probe_state

__version__ = "0.1.0"
