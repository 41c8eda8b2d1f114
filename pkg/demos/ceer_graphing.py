"""Turn a ceer into a graph whose components are its classes.

Two ceers are shown.  The first puts every number in the class of its
residue mod 3.  The second starts from the columns ``{<i, n> : n}`` of the
pairing function and glues some of them together on a schedule, so class
membership is only learned over time.
In both cases any two equivalent numbers end up at distance at most 2, and
``connect`` names the middle vertex.
"""

from graphable.ceer import adjacent, connect, merge_schedule_ceer, mod_k_ceer, witness_equivalent


def show(ceer, title, size=12):
    print(f"== {title}")
    for x in range(size):
        nbrs = [y for y in range(size) if y != x and adjacent(ceer, x, y)[0]]
        print(f"  {x:2d} -- {nbrs}")
    for x, y in [(0, 3), (1, 7), (2, 5)]:
        if witness_equivalent(ceer, x, y, budget=200) is not None:
            z = connect(ceer, x, y, budget=1000)
            print(f"  {x} ~ {y}: path {x} - {z} - {y}")
        else:
            print(f"  {x} and {y}: no merge seen within the budget")
    print()


if __name__ == "__main__":
    show(mod_k_ceer(3), "residues mod 3")
    show(merge_schedule_ceer([(3, 0, 1), (8, 2, 4)]),
         "columns 0 and 1 glued at stage 3, columns 2 and 4 at stage 8")
