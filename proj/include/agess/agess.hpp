#pragma once

#include "agess/adaptation.hpp"
#include "agess/diagnostics.hpp"
#include "agess/elliptical.hpp"
#include "agess/harness.hpp"
#include "agess/kernels.hpp"
#include "agess/presets.hpp"
#include "agess/rng.hpp"
#include "agess/shrinkage.hpp"
#include "agess/target.hpp"
#include "agess/targets.hpp"
#include "agess/trace.hpp"
