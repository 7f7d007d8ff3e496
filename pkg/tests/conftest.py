import pytest

from adex.config import resolve_graph
from adex.graph import load_graph_data


@pytest.fixture(scope="session")
def quarto():
    return resolve_graph("quarto")


def tiny_graph_data():
    """Small controllable graph: one block of four triples plus a second block."""
    return {
        "concepts": [
            {"id": "a", "label": "A"}, {"id": "b", "label": "B"},
            {"id": "c", "label": "C"}, {"id": "d", "label": "D"},
            {"id": "e", "label": "E"}, {"id": "x", "label": "X"},
        ],
        "blocks": ["one", "two"],
        "triples": [
            {"id": "t1", "subject": "a", "predicate": "rel", "object": "b",
             "complexity": 1, "block": "one",
             "comparison_domain": "chess",
             "template_texts": {"declarative": "A relates to B.",
                                "comparison": "Unlike {domain}, A relates to B.",
                                "repeat": "Again: A relates to B.",
                                "additional": "More on A and B.",
                                "polar": "Yes, A relates to B.",
                                "summarize": "Indeed, A relates to B."}},
            {"id": "t2", "subject": "b", "predicate": "rel", "object": "c",
             "complexity": 1, "block": "one",
             "preconditions": ["t1"], "has_example": True,
             "template_texts": {"declarative": "B relates to C.",
                                "example": "For example, B and C."}},
            {"id": "t3", "subject": "c", "predicate": "rel", "object": "d",
             "complexity": 2, "block": "one", "preconditions": ["t2"],
             "template_texts": {"declarative": "C relates to D."}},
            {"id": "t4", "subject": "a", "predicate": "rel", "object": "d",
             "complexity": 3, "block": "one", "mandatory": False,
             "template_texts": {"declarative": "A relates to D."}},
            {"id": "t5", "subject": "e", "predicate": "rel", "object": "x",
             "complexity": 1, "block": "two",
             "preconditions": [{"ref": "t3", "external": True}],
             "template_texts": {"declarative": "E relates to X."}},
        ],
    }


@pytest.fixture()
def tiny_graph():
    return load_graph_data(tiny_graph_data())
