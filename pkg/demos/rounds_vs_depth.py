# Round counts against circuit depth: the quantum protocols stay flat, plain GMW grows.
from mpqc import harness

depths = (1, 2, 5, 10, 20)
for proto in harness.PROTOCOLS:
    report = harness.rounds_report(harness.run_sweep(proto, depths, seed=3), proto)
    counts = [row["rounds"] for row in report.table]
    print(f"{proto:12s} {counts}  constant={report.constant}")
