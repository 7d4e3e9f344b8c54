#!/usr/bin/env python3
"""
Theory X toolbox

Runs the command-line entry point from the repository root, e.g.

    python theory_x.py validate data/figure3.graph
    python theory_x.py partition data/figure3.graph --links data/figure3_links_ones.csv
    python theory_x.py cosmo fit --model eds --data union2.txt
"""

# Explicit path resolution
import os
import sys

repo_root = os.path.abspath(os.path.join(os.path.dirname(__file__)))
if repo_root not in sys.path:
    sys.path.insert(0, repo_root)

from basic_capabilities.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
