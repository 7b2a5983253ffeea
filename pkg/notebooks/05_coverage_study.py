"""A small Monte Carlo coverage study of the interval methods.

The full design uses S = B = 1000 (about a minute per population on one core);
here S and B are reduced so the script finishes in seconds.

Run with ``python3 notebooks/05_coverage_study.py``.
"""
from ordagree import PopulationSpec, StudyConfig, generate_population, mix_to_dispersion, run_study
from ordagree.simulation import DEFAULT_P

pop = generate_population(PopulationSpec(p=DEFAULT_P, seed=0))
report = run_study(pop, StudyConfig(S=200, B=300, seed=0))
print(f"population d = {report.population_d:.4f}")
print(report.to_csv())
print("mean bootstrap d* by scheme:", {k: round(v, 4) for k, v in report.bias.items()})

# A lower-agreement population: mix toward the modal level until d is about 0.41.
q = mix_to_dispersion(DEFAULT_P, 0.41)
print("\nmixed distribution:", q.p.round(4))
low = run_study(generate_population(PopulationSpec(p=tuple(q.p), seed=0)), StudyConfig(S=200, B=300, seed=0))
print(low.to_csv())
