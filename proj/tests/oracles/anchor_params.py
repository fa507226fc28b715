#!/usr/bin/env python3
# Copyright 2026 The EvoNorm Search Authors.
# SPDX-License-Identifier: Apache-2.0
"""Counts anchor parameters by walking layer shapes, without the C++ code.

Usage: anchor_params.py > ../data/anchor_params.json

Convolutions carry no bias; the dense head does. Every custom-layer site has
four per-channel vectors (gamma, beta, v0, v1).
"""

import json


def scaled(base, mult):
    # lround: halves away from zero.
    return max(1, int(base * mult + 0.5))


class Counter:
    def __init__(self):
        self.total = 0
        self.sites = []

    def conv(self, k, cin, cout, groups=1):
        self.total += k * k * (cin // groups) * cout
        return cout

    def layer(self, c):
        self.total += 4 * c
        self.sites.append(c)
        return c

    def dense(self, cin, cout):
        self.total += cin * cout + cout


def anchor_r(mult):
    n = Counter()
    stem = scaled(8, mult)
    widths = [scaled(w, mult) for w in (8, 16, 16)]
    strides = [1, 2, 1]
    c = n.conv(3, 3, stem)
    for out, stride in zip(widths, strides):
        n.layer(c)
        n.conv(3, c, out)
        n.layer(out)
        n.conv(3, out, out)
        if c != out or stride != 1:
            n.conv(1, c, out)
        c = out
    n.layer(c)
    n.dense(c, 10)
    return n


def anchor_mobile(mult, expansion, layer_after_projection):
    n = Counter()
    stem = scaled(8, mult)
    widths = [scaled(w, mult) for w in (8, 16, 16)]
    head = scaled(32, mult)
    c = n.conv(3, 3, stem)
    n.layer(c)
    for out in widths:
        e = c * expansion
        n.conv(1, c, e)
        n.layer(e)
        n.conv(3, e, e, groups=e)
        n.layer(e)
        n.conv(1, e, out)
        if layer_after_projection:
            n.layer(out)
        c = out
    n.conv(1, c, head)
    n.layer(head)
    n.dense(head, 10)
    return n


def main():
    out = {}
    for mult in (1.0, 0.5, 2.0):
        key = repr(mult)
        nets = {
            "R": anchor_r(mult),
            "M": anchor_mobile(mult, 4, False),
            "E": anchor_mobile(mult, 6, True),
        }
        out[key] = {
            name: {"parameters": net.total, "layer_sites": net.sites}
            for name, net in nets.items()
        }
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
