"""
Comparing level selectors against a known truth
===============================================

A small version of the simulation study: for each replicate a sample is
drawn, a kernel density estimate is gridded, and every selector's regions
are scored by the true probability of their symmetric difference with
Monte-Carlo reference regions. Lower is better.
"""

from gridcontour.bench import BenchConfig, run_simulation_study

config = BenchConfig(
    densities=["paper-1", "paper-3"],
    grid_sizes=[(51, 51)],
    sample_sizes=[1000],
    replicates=5,
    base_seed=0,
    proxy_N=200_000,
)
report = run_simulation_study(config)
print(report.format_table())
