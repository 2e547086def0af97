"""geoflow: exact-arithmetic geodesic flow on polysquare and algebraic
polyrectangle translation surfaces.

Subpackages/modules map onto the main concerns:

* ``exactnum``  -- tower-field arithmetic, continued fractions, form bounds
* ``surfaces``  -- surface data model, validation, builders
* ``flow``      -- point/interval transport along a fixed slope
* ``density``   -- visiting-time search, explicit constants, gap statistics
* ``netformat`` -- the surface-net text format
* ``cli``       -- the ``geoflow`` command
"""

__version__ = "0.1.0"
