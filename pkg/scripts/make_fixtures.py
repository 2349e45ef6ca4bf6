"""Regenerate the bundled synthetic CSV fixtures under data/."""

from pathlib import Path

from fairlens import fixtures
from fairlens.dataset import write_csv

OUT = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    write_csv(fixtures.german_like(), OUT / "german_synthetic.csv")
    write_csv(fixtures.adult_like(n=5000), OUT / "adult_synthetic.csv")
    write_csv(fixtures.two_sensitive_driver(), OUT / "two_driver_synthetic.csv")
    for name in ("german_synthetic.csv", "adult_synthetic.csv",
                 "two_driver_synthetic.csv"):
        print(f"wrote {OUT / name}")


if __name__ == "__main__":
    main()
