"""Area-preserving Willmore flow of star-shaped surfaces in asymptotically
Schwarzschild spaces, with closed-form references and diagnostics.

Modules
-------
spectral     spherical-harmonic grids and transforms
ambient      metric, jets and curvature of the ambient space
surface      radial graphs and their induced geometry
flow         the area-preserving flow and its time stepping
oracle       reference values for centred and off-centre spheres
diagnostics  monitored scalars of a surface
experiments  configs, scenarios and output files
"""

from .ambient import MetricParams, curvature_at, metric_jet_at
from .diagnostics import DiagnosticsRecord, diagnostics_record, hawking_mass, willmore_energy
from .exceptions import *  # noqa: F401,F403
from .experiments import parse_config, run_experiment
from .flow import FlowState, StepConfig, StopCriteria, run_flow, step
from .oracle import (SphereSpec, centered_quantities, drift_rate, offcenter_area,
                     offcenter_willmore, pohozaev_integral)
from .surface import RadialGraph, geometry_bundle

__version__ = "0.1.0"
