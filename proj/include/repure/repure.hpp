#pragma once

// Umbrella header for the repure library.

#include "repure/errors.hpp"
#include "repure/io.hpp"
#include "repure/matrix.hpp"
#include "repure/purification.hpp"
#include "repure/two_qubit.hpp"
#include "repure/version.hpp"
