from flask import Flask, jsonify, request, abort

from .models import Cart, Product
from .pricing import grand_total, money
from .inventory import find_product

app = Flask(__name__)
carts = {}


@app.route("/cart/<cart_id>", methods=["GET"])
def show_cart(cart_id):
    cart = carts.get(cart_id)
    if cart is None:
        abort(404)
    return jsonify({
        "items": [{"sku": i.product.sku, "qty": i.quantity} for i in cart.items],
        "total": str(grand_total(cart)),
    })


@app.route("/cart/<cart_id>/add", methods=["POST"])
def add_to_cart(cart_id):
    payload = request.get_json(force=True)
    product = find_product(payload["sku"])
    if product is None or not product.in_stock():
        return jsonify({"error": "unavailable"}), 409
    carts.setdefault(cart_id, Cart()).add(product, int(payload.get("qty", 1)))
    return jsonify({"ok": True, "price": str(money(product.price))})
