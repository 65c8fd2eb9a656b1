import os
import subprocess
import sys

# Starts the HTTP service; use `python -m src.cli` for command-line runs.
host = os.getenv("HOST", "0.0.0.0")
port = os.getenv("PORT", "8000")
subprocess.run([sys.executable, "-m", "uvicorn", "src.main:app", "--host", host, "--port", port],
               cwd=os.path.dirname(os.path.abspath(__file__)))
