#pragma once

#include "advsub/attacks.hpp"
#include "advsub/checkpoint.hpp"
#include "advsub/config.hpp"
#include "advsub/dataset.hpp"
#include "advsub/error.hpp"
#include "advsub/experiment.hpp"
#include "advsub/interval.hpp"
#include "advsub/nn.hpp"
#include "advsub/rng.hpp"
#include "advsub/subset_filter.hpp"
#include "advsub/tensor.hpp"
#include "advsub/trainer.hpp"
