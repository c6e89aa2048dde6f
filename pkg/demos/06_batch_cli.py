"""Batch runs through the command-line front-end.

Equivalent shell call::

    u2gchan --config scenario.toml --output-dir out --emit all

Here the entry point is driven in-process and a variant scenario is written
to disk first.
"""
# %%
import json
import os
import tempfile

from u2gchan.cli import main
from u2gchan.config import default_config_text

work = tempfile.mkdtemp(prefix="u2gchan_")
scenario = os.path.join(work, "hover.toml")
text = default_config_text().replace('motion = "circular"', 'motion = "constant"')
with open(scenario, "w") as fh:
    fh.write(text)

# %% CIR frames, path-loss profile and statistics for a hovering UAV
code = main(["--config", scenario, "--output-dir", os.path.join(work, "out"), "--emit", "all",
             "--duration", "3", "--ensemble", "10", "--binary"])
print("exit code", code)
with open(os.path.join(work, "out", "manifest.json")) as fh:
    man = json.load(fh)
for f in man["files"]:
    print(f"  {f['path']:22s} {f['sha256'][:16]}")

# %% a bad value is rejected with the offending field named
print("exit code", main(["--output-dir", os.path.join(work, "bad"), "--duration", "0", "--quiet"]))
