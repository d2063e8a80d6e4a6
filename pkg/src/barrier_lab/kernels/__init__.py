"""Hot loops: compiled scalar kernels (``*_nb``) and numpy twins (``*_np``)."""
