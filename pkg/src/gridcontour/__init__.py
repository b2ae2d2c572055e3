"""Density contour levels and regions for gridded data."""

__version__ = "0.1.0"

from .grid import (
    Geometry,
    Grid,
    GridError,
    SparseCells,
    cell_hypervolume,
    normalize,
    parse_csv_grid,
    parse_esri_ascii,
    read_grid,
    regularize,
    split_signs,
    total_mass,
)
from .levels import (
    ContourLevels,
    DivisorMode,
    LevelResult,
    Method,
    density_level_single,
    density_levels_grid,
    density_levels_points,
    diverging_levels,
    equal_length_levels,
    jenks_levels,
    naive_quantile_levels,
    quantile,
)
from .regions import (
    ContourRegion,
    extract_region,
    region_area,
    region_mass,
    symmetric_difference_error,
)
from .density import (
    MixtureComponent,
    MixtureDensity,
    kde_bandwidth,
    kde_eval_grid,
    kde_eval_points,
    mixture_pdf,
    mixture_sample,
    preset,
    proxy_levels,
)

__all__ = [
    "Geometry",
    "Grid",
    "GridError",
    "SparseCells",
    "cell_hypervolume",
    "normalize",
    "parse_csv_grid",
    "parse_esri_ascii",
    "read_grid",
    "regularize",
    "split_signs",
    "total_mass",
    "ContourLevels",
    "DivisorMode",
    "LevelResult",
    "Method",
    "density_level_single",
    "density_levels_grid",
    "density_levels_points",
    "diverging_levels",
    "equal_length_levels",
    "jenks_levels",
    "naive_quantile_levels",
    "quantile",
    "ContourRegion",
    "extract_region",
    "region_area",
    "region_mass",
    "symmetric_difference_error",
    "MixtureComponent",
    "MixtureDensity",
    "kde_bandwidth",
    "kde_eval_grid",
    "kde_eval_points",
    "mixture_pdf",
    "mixture_sample",
    "preset",
    "proxy_levels",
]
