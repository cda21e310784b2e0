#pragma once

#include "wow/certificates.hpp"
#include "wow/cost.hpp"
#include "wow/coupling.hpp"
#include "wow/errors.hpp"
#include "wow/inner_ot.hpp"
#include "wow/json_io.hpp"
#include "wow/lifting.hpp"
#include "wow/measure.hpp"
#include "wow/monge.hpp"
#include "wow/outer_ot.hpp"
#include "wow/point.hpp"
#include "wow/scalar.hpp"
#include "wow/transport.hpp"
