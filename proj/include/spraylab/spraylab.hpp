#pragma once

#include "spraylab/model_space.hpp"
#include "spraylab/random.hpp"
#include "spraylab/set_oracle.hpp"
#include "spraylab/cone.hpp"
#include "spraylab/spray.hpp"
#include "spraylab/samplers.hpp"
#include "spraylab/parallel.hpp"
#include "spraylab/invariance.hpp"
#include "spraylab/config.hpp"
#include "spraylab/report.hpp"
#include "spraylab/registry.hpp"
