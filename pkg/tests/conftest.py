import sys
from pathlib import Path

# make `from oracles import ...` work regardless of how pytest was launched
sys.path.insert(0, str(Path(__file__).resolve().parent))
