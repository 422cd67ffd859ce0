// Umbrella header.

#pragma once

#include "altproj/chain.hpp"
#include "altproj/divergence.hpp"
#include "altproj/errors.hpp"
#include "altproj/instances.hpp"
#include "altproj/io.hpp"
#include "altproj/measure.hpp"
#include "altproj/numeric.hpp"
#include "altproj/projection.hpp"
#include "altproj/support.hpp"
#include "altproj/verify.hpp"
