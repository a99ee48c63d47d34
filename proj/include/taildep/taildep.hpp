#pragma once

#include "taildep/coeffs.hpp"
#include "taildep/errors.hpp"
#include "taildep/hyptest.hpp"
#include "taildep/ingest.hpp"
#include "taildep/io.hpp"
#include "taildep/numeric.hpp"
#include "taildep/polar.hpp"
#include "taildep/report.hpp"
#include "taildep/rng.hpp"
#include "taildep/simulate.hpp"
#include "taildep/spectral.hpp"
#include "taildep/stdf.hpp"
