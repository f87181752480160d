"""A short Monte-Carlo sweep written to CSV and SVG.

The same thing from the shell::

    switchbf sweep --trials 5 --snr=-10,0,10 --out records.csv --summary summary.csv --plot se.svg
"""

# %%
from switchbf.experiment import default_config, emit_plot, run_sweep, summarize, write_records, write_summary

cfg = default_config(trials=5, snr_db_list=[-10.0, 0.0, 10.0])
records = run_sweep(cfg, progress=lambda t: print(f"trial {t + 1}/{cfg.trials}"))
summary = summarize(records)
for row in summary:
    print(f"{row.method:9s} {row.snr_db:+5.0f} dB  {row.mean:6.3f} +- {row.stderr:.3f}")

write_records(records, "/tmp/demo_records.csv")
write_summary(summary, "/tmp/demo_summary.csv")
emit_plot(summary, "/tmp/demo_se.svg")
print("wrote /tmp/demo_records.csv, /tmp/demo_summary.csv, /tmp/demo_se.svg")
