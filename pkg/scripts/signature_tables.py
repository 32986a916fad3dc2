"""Sign-pattern tables: all signatures for m=6, n=3 and the simplex T = {2,5,7,8,10} in m=12.

Usage: python3 scripts/signature_tables.py
"""

from plsgeom import IndexSubset, enumerate_signatures, expand_template, simplex_template, simplex_vertex_patterns


def main():
    print("sign(omega - 1) for m=6, n=3")
    for p in enumerate_signatures(6, 3):
        print(f"  {p}   {','.join(map(str, p.change_positions))}")

    T = IndexSubset((2, 5, 7, 8, 10), 12)
    print("\nvertices of the simplex on T = {2,5,7,8,10}")
    for tau, p in simplex_vertex_patterns(T):
        print(f"  z_({tau.label(',')}){'':<{10 - len(tau.label(','))}} {p}")
    template = simplex_template(T)
    print(f"  interior     {template}")

    print("\nfull signatures compatible with the interior template")
    for p in expand_template(template, len(T) - 1):
        print(f"  {','.join(map(str, p.switch_positions)):<10} {p}")


if __name__ == "__main__":
    main()
