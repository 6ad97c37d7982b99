"""Regenerate tests/data/natural/*.pgm from scikit-image's bundled sample images.

Color images are converted to gray with Rec.601 luma and rounded half away
from zero, the same conversion the library uses. Requires scikit-image; the
PGM files are committed so the test suite does not.
"""

from pathlib import Path

import skimage.data

from msmooth.image_io import quantize, save, to_luminance

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "natural"
IMAGES = ["camera", "moon", "astronaut", "rocket"]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name in IMAGES:
        img = getattr(skimage.data, name)()
        if img.ndim == 3:
            img = quantize(to_luminance(img))
        save(OUT / f"{name}.pgm", img)
        print(name, img.shape)


if __name__ == "__main__":
    main()
