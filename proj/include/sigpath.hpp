#ifndef SIGPATH_HPP
#define SIGPATH_HPP

#include "sigpath/error.hpp"
#include "sigpath/experiment.hpp"
#include "sigpath/parallel.hpp"
#include "sigpath/paths.hpp"
#include "sigpath/random.hpp"
#include "sigpath/regress.hpp"
#include "sigpath/signature.hpp"
#include "sigpath/stochastic.hpp"
#include "sigpath/tensor.hpp"
#include "sigpath/words.hpp"

#endif
