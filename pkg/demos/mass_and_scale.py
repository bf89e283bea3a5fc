"""Small versions of the two benchmarks: mass captured by the top IB
assignments versus the top complete assignments, and time to the IB MAP on a
larger network."""

from ibinfer import GenSpec
from ibinfer.harness import mass_curves, scale_csv, scale_run

curves = mass_curves(GenSpec(), networks=10, top=15, seed=0)
print(curves.summary_csv())

print(scale_csv(scale_run(GenSpec(node_count=120, max_parents=3, csi_fraction=0.7), evidence_sinks=12)))
