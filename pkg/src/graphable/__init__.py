"""Oracle-based constructions on countable objects.

* :mod:`graphable.oracles` -- bit streams, linear orders and relational
  structures on the naturals as total deterministic oracles.
* :mod:`graphable.ceer` -- diameter-2 graphings of ceers with infinite classes.
* :mod:`graphable.linear_orders` -- coding a bit stream into a copy of a linear order.
* :mod:`graphable.structures` -- coding a bit stream into a copy of a
  non-trivial relational structure, and isomorphisms of trivial ones.
* :mod:`graphable.forcing` -- labelled-tree forcing conditions and coding along a path.
* :mod:`graphable.verify` and :mod:`graphable.cli` -- property suites and the command line.
"""

from .errors import BudgetExhausted, ContractViolation, GraphableError, InternalContradiction
from .oracles import (BitStream, LinearOrderOracle, Signature, StructureOracle, join,
                      materialize_prefix, order_code, decode_order, pair, unpair)
from .ceer import adjacent, connect, witness_equivalent, witness_graph
from .linear_orders import encode_order, decode_payload, recover_base_order, recover_isomorphism
from .structures import (decode_structure, encode_structure, find_distinguishing,
                         is_trivial_within, trivial_extend_iso)
from .forcing import (KsCondition, build_generic, encode_bit_along, eval_labels, extends,
                      make_condition)

__version__ = "0.1.0"
