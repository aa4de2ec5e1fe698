#pragma once

#include "funflir/critical_values.hpp"
#include "funflir/density.hpp"
#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"
#include "funflir/io.hpp"
#include "funflir/lrv.hpp"
#include "funflir/moment_process.hpp"
#include "funflir/rng.hpp"
#include "funflir/simlab.hpp"
#include "funflir/testkit.hpp"
#include "funflir/version.hpp"
#include "funflir/weights.hpp"
