#pragma once

#include "bayes_arbiter/dataset.hpp"
#include "bayes_arbiter/distributions.hpp"
#include "bayes_arbiter/errors.hpp"
#include "bayes_arbiter/evidence.hpp"
#include "bayes_arbiter/experiments.hpp"
#include "bayes_arbiter/mixture.hpp"
#include "bayes_arbiter/predictive.hpp"
#include "bayes_arbiter/quadrature.hpp"
#include "bayes_arbiter/rng.hpp"
#include "bayes_arbiter/special.hpp"
#include "bayes_arbiter/stats.hpp"
