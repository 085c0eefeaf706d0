#pragma once

#include "qkdverify/basis.hpp"
#include "qkdverify/channel.hpp"
#include "qkdverify/operators.hpp"
#include "qkdverify/protocols.hpp"
#include "qkdverify/scan.hpp"
#include "qkdverify/sdp.hpp"
#include "qkdverify/serialize.hpp"
#include "qkdverify/verifier.hpp"
