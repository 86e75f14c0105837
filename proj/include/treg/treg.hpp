#pragma once

#include "treg/activations.hpp"
#include "treg/csv.hpp"
#include "treg/dataset.hpp"
#include "treg/errors.hpp"
#include "treg/gradcheck.hpp"
#include "treg/initializers.hpp"
#include "treg/losses.hpp"
#include "treg/matrix.hpp"
#include "treg/model_io.hpp"
#include "treg/network.hpp"
#include "treg/ols.hpp"
#include "treg/optimizers.hpp"
#include "treg/rng.hpp"
