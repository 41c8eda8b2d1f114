"""Code bits into a copy of a relational structure, then read them back.

At every stage the encoder looks for the first quantifier-free formula
that separates two tuples of fresh elements, and places one or the other
next depending on the bit to send.  Decoding repeats the search on the
copy.  A structure with no separating formula, such as an infinite set with
nothing on it, is reported as trivial instead.
"""

from graphable.oracles import bits_from_string, empty_structure, path_graph, random_graph
from graphable.structures import TrivialityDetected, decode_structure, encode_structure

payload = bits_from_string("1101")

for name, structure in [("path graph", path_graph()), ("random digraph", random_graph(5))]:
    enc = encode_structure(structure, payload, stages=16, budget=10**5)
    dec = decode_structure(enc.structure, structure.signature, stages=16, budget=10**5)
    print(f"== {name}")
    for rec in enc.placement.log[:4]:
        print(f"  stage {rec.stage}: formula #{rec.formula_index} {rec.formula}  bit {rec.bit}")
    print(f"  largest formula index needed: {enc.certificate.max_bound}")
    print(f"  queue matches: {dec.queue == enc.queue[:16]}")
    print(f"  payload decoded: {dec.payload}")
    print()

try:
    encode_structure(empty_structure(), payload, stages=4, budget=10**4)
except TrivialityDetected as err:
    print("== empty structure")
    print(f"  stage {err.stage}: {err}")
