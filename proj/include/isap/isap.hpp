#pragma once

#include "isap/bounds.hpp"
#include "isap/enumeration.hpp"
#include "isap/error.hpp"
#include "isap/estimator.hpp"
#include "isap/exact.hpp"
#include "isap/io.hpp"
#include "isap/lattice.hpp"
#include "isap/mcmc.hpp"
#include "isap/model.hpp"
#include "isap/polygon.hpp"
#include "isap/rng.hpp"
#include "isap/srp.hpp"
#include "isap/zm.hpp"
