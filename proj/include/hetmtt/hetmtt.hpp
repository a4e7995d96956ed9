#pragma once

#include "hetmtt/batch.hpp"
#include "hetmtt/catalog.hpp"
#include "hetmtt/ccvd.hpp"
#include "hetmtt/config.hpp"
#include "hetmtt/control.hpp"
#include "hetmtt/distributed_phd.hpp"
#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/metrics.hpp"
#include "hetmtt/netsim.hpp"
#include "hetmtt/partition.hpp"
#include "hetmtt/phd.hpp"
#include "hetmtt/rng.hpp"
#include "hetmtt/sensors.hpp"
#include "hetmtt/simulation.hpp"
#include "hetmtt/targets.hpp"
#include "hetmtt/world.hpp"
