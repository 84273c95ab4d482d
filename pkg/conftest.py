import os
import sys

# Add repository root to path so `algorithms` and `harness` import under pytest
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
