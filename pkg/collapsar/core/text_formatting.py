# Copyright 2024 The Collapsar Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Utility library for console and report formatting."""

import fractions
import re
import termcolor


# Regular expression for ANSI color characters.
_ANSI_COLOR_REGEX = re.compile(r'\x1b\[[0-9;]*m')


def decolored(text: str) -> str:
  """Return the de-colored string that may contains ANSI color characters."""
  return re.sub(_ANSI_COLOR_REGEX, '', text)


def colored(
    text: str,
    color: str | None = None,
    background: str | None = None,
    styles: list[str] | None = None
) -> str:
  """Returns the colored text with ANSI color characters.

  Args:
    text: A string that may or may not already has ANSI color characters.
    color: A string for text colors. Applicable values are:
      'red', 'green', 'yellow', 'blue', 'magenta', 'cyan', 'white'.
    background: A string for background colors. Applicable values are:
      'red', 'green', 'yellow', 'blue', 'magenta', 'cyan', 'white'.
    styles: A list of strings for applying styles on the text.
      Applicable values are:
      'bold', 'dark', 'underline', 'blink', 'reverse', 'concealed'.

  Returns:
    A string with ANSI color characters embracing the entire text.
  """
  return termcolor.colored(
      text,
      color=color,
      on_color=('on_' + background) if background else None,
      attrs=styles)


def decimal_str(
    value: fractions.Fraction | int | float, places: int = 5) -> str:
  """Renders an exact value as a fixed-point decimal string.

  Rounding is done on the exact rational (half away from zero), so the output
  does not depend on binary floating point.

  Args:
    value: A fraction, an integer or a float.
    places: Number of digits after the decimal point.

  Returns:
    A string such as '0.36000'.
  """
  if places < 0:
    raise ValueError(f'`places` must be non-negative, got {places}.')
  q = fractions.Fraction(value)
  sign = '-' if q < 0 else ''
  q = abs(q)
  scaled = q * 10 ** places
  units = scaled.numerator // scaled.denominator
  if (scaled - units) * 2 >= 1:
    units += 1
  digits = str(units).rjust(places + 1, '0')
  if places == 0:
    return sign + digits
  return f'{sign}{digits[:-places]}.{digits[-places:]}'


def fraction_str(value: fractions.Fraction) -> str:
  """Returns 'p/q' for a fraction, always with an explicit denominator."""
  value = fractions.Fraction(value)
  return f'{value.numerator}/{value.denominator}'

