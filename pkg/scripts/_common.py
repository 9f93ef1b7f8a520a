import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))


def parser(desc):
    p = argparse.ArgumentParser(description=desc)
    p.add_argument("--scenario", default="table2")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def write(table, args, stem):
    from vlcbo.results import emit
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.{args.format}"
    emit(table, path, args.format)
    print(f"wrote {path} ({len(table)} rows)")
