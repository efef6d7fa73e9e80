#pragma once

#include "cqsim/analysis/complexity.hpp"
#include "cqsim/combinatorial/importance.hpp"
#include "cqsim/compressors/constants.hpp"
#include "cqsim/compressors/inputs.hpp"
#include "cqsim/compressors/quantizers.hpp"
#include "cqsim/compressors/round.hpp"
#include "cqsim/compressors/spec.hpp"
#include "cqsim/compressors/wire.hpp"
#include "cqsim/mselab/exact.hpp"
#include "cqsim/mselab/mse.hpp"
#include "cqsim/mselab/suite.hpp"
#include "cqsim/numkit/bits.hpp"
#include "cqsim/numkit/format.hpp"
#include "cqsim/numkit/linalg.hpp"
#include "cqsim/numkit/random.hpp"
#include "cqsim/optimizers/config.hpp"
#include "cqsim/optimizers/marina.hpp"
#include "cqsim/optimizers/stepsize.hpp"
#include "cqsim/optimizers/tuning.hpp"
#include "cqsim/problems/generators.hpp"
#include "cqsim/problems/libsvm.hpp"
#include "cqsim/problems/logistic.hpp"
#include "cqsim/problems/quadratic.hpp"
#include "cqsim/problems/smoothness.hpp"
