"""
Outcome -> final pair table.

Derived by propagating every successful combination symbolically: the Bell
arm of each node fixes which herald photon joins the final pair, psi_plus
readings add an X on the station's correction photon, and an odd number of
|A> single readings adds a Z on the condition's correction target.
"""

import logging
from dataclasses import dataclass

from .events import combinations
from .layout import ExperimentLayout


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TableRow:
    condition: str
    outcomes: tuple  # ((station id, tag value), ...)
    pair: tuple
    corrections: tuple

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "outcomes": dict(self.outcomes),
            "pair": f"{self.pair[0]}&{self.pair[1]}",
            "corrections": "".join(self.corrections) or "I",
        }


def final_pair_table(layout: ExperimentLayout) -> list:
    rows = []
    for cond in layout.conditions:
        for combo in combinations(cond):
            if tuple(combo.pair) not in layout.final_candidates:
                logger.warning(f"{combo.key}: pair {combo.pair} is not a final candidate")
            rows.append(
                TableRow(
                    condition=cond.name,
                    outcomes=tuple((st, tag.value) for st, tag in combo.tags),
                    pair=combo.pair,
                    corrections=combo.corrections(layout, cond),
                )
            )
    logger.info(f"Final-pair table for {layout.name}: {len(rows)} rows")
    return rows
