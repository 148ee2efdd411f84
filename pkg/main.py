"""
Entry point for running beamsynth from a source checkout.
"""
import os
import sys

# Add the src directory to the path so imports work correctly
src_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "src")
sys.path.insert(0, src_dir)

from beamsynth.cli import app  # noqa: E402

if __name__ == "__main__":
    app()
