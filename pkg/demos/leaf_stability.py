"""
Perturbed leaves converge and the Hawking mass grows
====================================================

A centred sphere deformed by a single spherical harmonic flows back to a
round sphere of the same area. Along the way the Willmore energy falls,
the Hawking mass rises and the area is held fixed by the projection step.
"""

from willmore_lab import FlowState, MetricParams, RadialGraph, StepConfig, StopCriteria, run_flow

m, R, L = 1.0, 20.0, 8
params = MetricParams(mass=m)

for mode in [(2, 0, 0.05), (3, -2, 0.05), (4, 3, 0.05)]:
    graph = RadialGraph.perturbed(R, [mode], L)
    state = FlowState(graph, params)
    res = run_flow(state, StepConfig(c_stab=2.0),
                   StopCriteria(residual_tol=1e-7, max_steps=5000, record_every=50))
    first, last = res.records[0], res.records[-1]
    print("mode %-12s %4d steps (%s)" % (mode, res.steps, res.stop_reason))
    print("    residual %.1e   |Acirc| %.1e" % (last.residual, last.acirc_l2))
    print("    m_H %.8f -> %.8f   area drift %.1e"
          % (first.hawking_mass, last.hawking_mass, abs(last.area_g / first.area_g - 1)))
