#pragma once

#include "cemwave/common.hpp"
#include "cemwave/mesh.hpp"
#include "cemwave/media.hpp"
#include "cemwave/element.hpp"
#include "cemwave/fine_assembly.hpp"
#include "cemwave/aux_spectral.hpp"
#include "cemwave/cem_space.hpp"
#include "cemwave/propagator.hpp"
#include "cemwave/simulation.hpp"
#include "cemwave/analysis.hpp"
#include "cemwave/config.hpp"
#include "cemwave/io.hpp"
#include "cemwave/run.hpp"
