"""
Sweeping a window along a tape
==============================

Roll a fixed-width window across a synthetic tape and track how far the
market-based 1% quantile sits from the frequency-based one.
"""
from tapevar import TapeSpec, synthesize_tape, sweep
from tapevar.tape import window_centers

tape = synthesize_tape(TapeSpec(5000, volatility=0.002, volume_kind="integer", volume=40,
                                poisson_arrivals=True), seed=11)
centers = window_centers(250.0, 4750.0, 250.0)

for entry in sweep(tape, centers, width=500.0, epsilons=[0.01], workers=4):
    if entry.report is None:
        print(f"{entry.center:7.1f}  {entry.error}")
        continue
    (_, gap), = entry.report.divergence
    fq = entry.report.result("frequency-gaussian", 0.01).p_epsilon
    shown = "n/a" if gap is None else f"{gap:+.4f}"
    print(f"{entry.center:7.1f}  frequency {fq:.4f}  market - frequency {shown}")
