#pragma once

#include "dsa/errors.hpp"
#include "dsa/field.hpp"
#include "dsa/infoaudit.hpp"
#include "dsa/protocol.hpp"
#include "dsa/report.hpp"
#include "dsa/simnet.hpp"
