/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file rng.hpp
  \brief Seed derivation and portable uniform input sampling

  All randomness in the library funnels through explicit 64-bit seeds.  Seeds
  for independent streams are derived from one root seed with splitmix64 so
  that a single knob reproduces a whole run.  Input sampling masks raw
  mt19937_64 output; since the engine's output sequence is fixed by the
  standard and 2^width divides 2^64, the draw is uniform and identical on
  every platform.
*/

#pragma once

#include <cstdint>
#include <random>

namespace bsdsynth
{

inline uint64_t splitmix64( uint64_t x )
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

/*! Derive the seed of an independent stream from a root seed and a stream tag. */
inline uint64_t derive_seed( uint64_t root, uint64_t tag )
{
  return splitmix64( root ^ splitmix64( tag ) );
}

/*! Uniform sampler over {0,1}^width, deterministic per seed. */
class input_sampler
{
public:
  input_sampler( uint64_t seed, uint32_t width )
      : _gen( seed ),
        _mask( width >= 64u ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << width ) - 1u ) )
  {}

  uint64_t next() { return _gen() & _mask; }

  /*! Draw a single bit. */
  bool next_bit() { return _gen() & 1u; }

private:
  std::mt19937_64 _gen;
  uint64_t _mask;
};

} // namespace bsdsynth
