"""Driving the command-line interface from Python: solve, verify the
stored record, and reproduce the run from its manifest."""
import tempfile
from pathlib import Path

from noncyl import cli, io


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cli.run(["solve", "--scenario", "shrinking_ball", "--ell-sequence", "4,8",
                 "--out", str(tmp / "run")])
        code = cli.run(["verify", "--scenario", "shrinking_ball", "--record", str(tmp / "run"),
                        "--out", str(tmp / "check")])
        print("verify exit code:", code)
        print((tmp / "check" / "manifest.ini").read_text().split("[verdicts]")[1].strip())

        cli.run(["solve", "--config", str(tmp / "run" / "manifest.ini"), "--out", str(tmp / "again")])
        same = io.tree_digest(tmp / "run") == io.tree_digest(tmp / "again")
        print("rerun from manifest reproduces every artifact:", same)


if __name__ == "__main__":
    main()
