"""A miniature accuracy-versus-samples benchmark.

The harness is driven by the same text config the command line uses.
Every trial simulates once, checkpoints the streaming moments, and scores
each method.  The summary table is what a plotting script would consume.
"""
import io

from ndsid.bench import ExperimentConfig, run_benchmark, summarize

config = ExperimentConfig.from_text("""
regime.N = 20
regime.S = 15
regime.alpha = 0.6
regime.rho = 0.8
noise.beta = 5
noise.headroom = 1
noise.osc_fraction = 0.5
data.checkpoints = 1000, 10000, 50000
data.trials = 3
methods = granger, nig, nig_oracle, ffnn
train.betas = 0, 5, 10
train.epochs = 100
""")

csv_text = io.StringIO()
rows = run_benchmark(config, csv_text)
print(csv_text.getvalue().splitlines()[0], "...", len(rows), "rows")
print(f"\n{'method':>11} {'n':>7} {'mean':>6} {'sd':>6}")
for s in summarize(rows):
    print(f"{s.method:>11} {s.n:>7} {s.mean:6.3f} {s.sd:6.3f}")
