#pragma once

#include "pals/config.hpp"
#include "pals/csrbf.hpp"
#include "pals/ct.hpp"
#include "pals/dot.hpp"
#include "pals/ert.hpp"
#include "pals/experiment.hpp"
#include "pals/forward.hpp"
#include "pals/fv.hpp"
#include "pals/grid.hpp"
#include "pals/heaviside.hpp"
#include "pals/io.hpp"
#include "pals/level_set.hpp"
#include "pals/model.hpp"
#include "pals/optim.hpp"
#include "pals/phantom.hpp"
#include "pals/synth.hpp"
