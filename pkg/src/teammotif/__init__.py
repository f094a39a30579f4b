"""teammotif: bot detection, team event sequences, matched sampling, and
contrast motif discovery for GitHub-style event streams."""

__version__ = "0.1.0"
