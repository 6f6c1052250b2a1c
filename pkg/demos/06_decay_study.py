"""The decay study end to end: sweep the block rank, fit the exponential rate.

At production scale (square at ~2700 elements, s in {0.25, 0.5, 0.75}) the
fitted rate lands near 10, matching the reference curve exp(-10 r^(1/3)); at
the demo scale below the rate is similar and the run takes about two minutes.
The same sweep is available from the command line:

    fraclap study --domain square --refine 37 --out study.csv
    fraclap fit --in study.csv

Run me:  python demos/06_decay_study.py
"""

from fraclap.study import StudyConfig, fit_by_s, run_study, write_csv

cfg = StudyConfig(
    domain="square",
    refine=14,                  # N = 169; refine=37 reproduces the full study
    s_values=(0.25, 0.5, 0.75),
    ranks=tuple(range(1, 21)),
    out="decay_demo.csv",
)

records = run_study(cfg, log=lambda msg: print(f"  {msg}"))
write_csv(cfg.out, records)
print(f"\nwrote {cfg.out} with {len(records)} rows")

print("\nfitted decay ln(error) = c - b * r^(1/3):")
for s, (b, r2) in fit_by_s(records).items():
    print(f"  s = {s}: b = {b:5.2f}, R^2 = {r2:.4f}")
print("reference rate: b = 10")
