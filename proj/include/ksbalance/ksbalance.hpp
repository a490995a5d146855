#pragma once

#include "ksbalance/config.hpp"
#include "ksbalance/hermitian.hpp"
#include "ksbalance/frames.hpp"
#include "ksbalance/barrier.hpp"
#include "ksbalance/katz.hpp"
#include "ksbalance/io.hpp"
