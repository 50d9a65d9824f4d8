"""
Regenerating the bundled surfaces
=================================

The JSON surfaces shipped with the package are built deterministically;
this rewrites them in place.
"""

from cusp_spectra.surface import write_bundled_surfaces

for path in write_bundled_surfaces():
    print(path)
