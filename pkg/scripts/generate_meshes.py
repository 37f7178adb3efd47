"""Generate the fixture and study meshes into a directory.

    python scripts/generate_meshes.py --out meshes
"""

from pathlib import Path

import click
import structlog

from aerodg.mesh import PatchTag, builders, write_mesh
from aerodg.observability import configure_logging

logger = structlog.get_logger(__name__)

NACA_LEVELS = {
    # name: (points around the wall, radial layers)
    "naca0012_tiny": (32, 8),
    "naca0012_coarse": (64, 12),
    "naca0012_mesh1": (128, 24),
    "naca0012_fine": (256, 48),
}


@click.command()
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("meshes"), show_default=True)
@click.option("--levels", default=",".join(NACA_LEVELS), show_default=True, help="Comma-separated NACA mesh names")
@click.option("--radius", type=float, default=20.0, show_default=True, help="Far-field radius in chords")
def main(out: Path, levels: str, radius: float) -> None:
    configure_logging()
    out.mkdir(parents=True, exist_ok=True)
    for name in filter(None, (s.strip() for s in levels.split(","))):
        if name not in NACA_LEVELS:
            raise click.BadParameter(f"unknown level {name!r}", param_hint="--levels")
        n_around, n_radial = NACA_LEVELS[name]
        mesh = builders.naca_omesh("0012", n_around, n_radial, radius=radius)
        write_mesh(mesh, out / f"{name}.mesh")
        logger.info("Mesh written", name=name, elements=mesh.n_elements)

    channel = builders.rectangle(
        16, 4, (0.0, 0.0, 4.0, 1.0), tags={"bottom": PatchTag.WALL, "top": PatchTag.WALL}
    )
    write_mesh(channel, out / "channel.mesh")
    write_mesh(builders.square_hole(), out / "square_hole.mesh")
    click.echo(f"meshes written to {out}")


if __name__ == "__main__":
    main()
