import codecs

from .tensor_codecs import lookup

codecs.register(lookup)
