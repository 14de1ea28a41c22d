"""percept: modeling public perception of science media.

Catalog of 25 rateable statements over 12 perception dimensions, corpus
sampling and synthetic annotation, reliability statistics, a trainable
multi-task perception scorer, mixed-effects perception/engagement studies,
and an HTTP scoring service.
"""

__version__ = "0.1.0"
