#pragma once

#include "constants.hpp"
#include "derived.hpp"
#include "error.hpp"
#include "fields.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "sensing.hpp"
#include "sideband.hpp"
#include "stability.hpp"
#include "thermal.hpp"
#include "version.hpp"
