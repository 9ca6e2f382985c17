# How deep is a syndrome-extraction round on the shuttled array?
# Walk the catalog, print the per-basis round depth, then the full
# layer-count table for a 10-round memory run.
from modqec import (
    catalog_code,
    depth_table,
    load_catalog,
    program_to_text,
    sparse_cyclic_layout,
)

for name in sorted(load_catalog()):
    code = catalog_code(name)
    result = sparse_cyclic_layout(code, basis="Z", rounds=1)
    report = result.depth_report()
    # shifts dominate the budget on larger rings; gates stay at omega
    print(
        f"{name}: one Z round costs {report.total_depth} layers "
        f"({report.two_qubit_layers} gate, {report.shift_layers} shift, "
        f"{report.total_cx} CX gates total)"
    )

print()
code = catalog_code("bb144")
print("bb144, 10 rounds, all four fixed-budget layouts:")
for layout, row in depth_table(code, rounds=10).items():
    print(
        f"  {layout:<20} gates {row['gate_layers']:>4}  "
        f"shifts {row['shift_layers']:>4}  meas {row['measure_layers']:>3}  "
        f"total {row['total_depth']:>4}"
    )

# a program is plain text; the first few lines of a bb72 round:
print()
text = program_to_text(sparse_cyclic_layout(catalog_code("bb72"), "Z").program)
print("\n".join(text.splitlines()[:6]))
print("...")
