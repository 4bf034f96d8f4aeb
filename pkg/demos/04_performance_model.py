"""Performance model tour: scheduling modes, baselines, rate projection.

Prints iteration latency and throughput for the three quadruple-activation
scheduling modes and the four baseline DRAM-TRNG configurations, then
projects throughput across DDR4 transfer rates.
"""

from quactrng.config import TimingParams
from quactrng.perf import (BASELINE_MODES, QUAC_MODES, baseline,
                           idle_scaled_throughput, project, schedule,
                           storage_bits)

timings = TimingParams()
SIB = 7

print("=== quadruple-activation modes @ DDR4-2400, SIB=7 ===")
for mode in QUAC_MODES:
    r = schedule(mode, timings, sib=SIB)
    print(f"  {mode:10s} iteration {r.iteration_ns:8.1f} ns  "
          f"throughput {r.throughput_gbps:5.2f} Gb/s  "
          f"first word {r.latency_256_ns:6.1f} ns")

print()
print("=== baselines @ DDR4-2400 ===")
for mode in BASELINE_MODES:
    r = baseline(mode, timings)
    print(f"  {mode:19s} throughput {r.throughput_gbps:6.3f} Gb/s  "
          f"256-bit latency {r.latency_256_ns:6.1f} ns")

print()
print("=== transfer-rate projection (Gb/s, one channel) ===")
rates = [1600, 2400, 3200, 4800, 8000, 12000]
modes = list(QUAC_MODES) + list(BASELINE_MODES)
table = project(modes, rates, timings=timings, sib=SIB)
header = "rate".rjust(6) + "".join(m.rjust(20) for m in modes)
print(header)
for rate in rates:
    row = f"{rate:6d}" + "".join(f"{table[rate][m]:20.3f}" for m in modes)
    print(row)

print()
print("=== speedup of the 4-channel generator over each baseline ===")
for rate in (2400, 12000):
    row = table[rate]
    parts = [f"{m.split('-')[0]}-{m.split('-')[1][:3]} "
             f"{row[f'quac_vs_{m}']:.2f}x" for m in BASELINE_MODES]
    print(f"  @{rate}: " + ", ".join(parts))

print()
full = schedule("rc-bgp", timings, sib=SIB).throughput_gbps
print(f"idle-time generation, 4 channels, 74.13% idle: "
      f"{idle_scaled_throughput(full, 0.7413):.1f} Gb/s")
print(f"controller plan storage: {storage_bits()} bits")
