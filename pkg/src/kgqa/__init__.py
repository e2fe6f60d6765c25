"""Question answering over a triple-store knowledge graph.

Two workflows run side by side: a translator path (question -> CQL ->
name repair -> execution) and a searcher path (one-hop retrieval ->
reader model).  Their answers are fused per question and scored.
"""

from kgqa.graph import KnowledgeGraph, Triple, load_triples

__all__ = ["KnowledgeGraph", "Triple", "load_triples"]
__version__ = "0.1.0"
